# Generated by nnport 0.1.0: tf/sequential -> pt/subclassing, pivot sha256 44b5c77a7132b4d20aee41203c77b88de2fa467d52d78dc3b413711f9f75674b
import torch
from torch import nn

INPUT_SHAPE = (32, 32, 3)
METRICS = ("accuracy",)


class model(nn.Module):
    def __init__(self):
        super().__init__()
        self.conv2d = nn.Conv2d(in_channels=3, out_channels=32, kernel_size=(3, 3), stride=(1, 1), padding=0)
        self.conv2d_act = nn.ReLU()
        self.max_pool2d = nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))
        self.conv2d_1 = nn.Conv2d(in_channels=32, out_channels=64, kernel_size=(3, 3), stride=(1, 1), padding=0)
        self.conv2d_1_act = nn.ReLU()
        self.max_pool2d_1 = nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))
        self.conv2d_2 = nn.Conv2d(in_channels=64, out_channels=64, kernel_size=(3, 3), stride=(1, 1), padding=0)
        self.conv2d_2_act = nn.ReLU()
        self.flatten = nn.Flatten()
        self.linear = nn.Linear(in_features=1024, out_features=64)
        self.linear_act = nn.ReLU()
        self.linear_1 = nn.Linear(in_features=64, out_features=10)

    def forward(self, inputs):
        conv2d = self.conv2d_act(self.conv2d(inputs.permute(0, 3, 1, 2)))
        max_pool2d = self.max_pool2d(conv2d)
        conv2d_1 = self.conv2d_1_act(self.conv2d_1(max_pool2d))
        max_pool2d_1 = self.max_pool2d_1(conv2d_1)
        conv2d_2 = self.conv2d_2_act(self.conv2d_2(max_pool2d_1)).permute(0, 2, 3, 1)
        flatten = self.flatten(conv2d_2)
        linear = self.linear_act(self.linear(flatten))
        linear_1 = self.linear_1(linear)
        return linear_1


def make_loader(dataset):
    return torch.utils.data.DataLoader(dataset, batch_size=32, shuffle=True)


def train(model, loader):
    optimizer = torch.optim.Adam(model.parameters(), lr=0.001)
    criterion = nn.CrossEntropyLoss()
    for epoch in range(10):
        model.train()
        for x, y in loader:
            optimizer.zero_grad()
            loss = criterion(model(x), y)
            loss.backward()
            optimizer.step()
    return model
