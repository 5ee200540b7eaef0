# Generated by nnport 0.1.0: pt/subclassing -> pt/subclassing, pivot sha256 0c6a60776d9620b334e49d1fd39ca786cf6f25e5fc194719156d32c068c57a5b
import torch
from torch import nn

INPUT_SHAPE = (32, 32, 3)
METRICS = ()
DATASETS = {
    "cifar10": ("data/cifar10", "classification", "images"),
    "svhn": ("data/svhn", "classification", "images"),
}


class VGG16(nn.Module):
    def __init__(self):
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels=3, out_channels=64, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv1_act = nn.ReLU()
        self.conv2 = nn.Conv2d(in_channels=64, out_channels=64, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv2_act = nn.ReLU()
        self.pool1 = nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))
        self.conv3 = nn.Conv2d(in_channels=64, out_channels=128, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv3_act = nn.ReLU()
        self.conv4 = nn.Conv2d(in_channels=128, out_channels=128, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv4_act = nn.ReLU()
        self.pool2 = nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))
        self.conv5 = nn.Conv2d(in_channels=128, out_channels=256, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv5_act = nn.ReLU()
        self.conv6 = nn.Conv2d(in_channels=256, out_channels=256, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv6_act = nn.ReLU()
        self.conv7 = nn.Conv2d(in_channels=256, out_channels=256, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv7_act = nn.ReLU()
        self.pool3 = nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))
        self.conv8 = nn.Conv2d(in_channels=256, out_channels=512, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv8_act = nn.ReLU()
        self.conv9 = nn.Conv2d(in_channels=512, out_channels=512, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv9_act = nn.ReLU()
        self.conv10 = nn.Conv2d(in_channels=512, out_channels=512, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv10_act = nn.ReLU()
        self.pool4 = nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))
        self.conv11 = nn.Conv2d(in_channels=512, out_channels=512, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv11_act = nn.ReLU()
        self.conv12 = nn.Conv2d(in_channels=512, out_channels=512, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv12_act = nn.ReLU()
        self.conv13 = nn.Conv2d(in_channels=512, out_channels=512, kernel_size=(3, 3), stride=(1, 1), padding="same")
        self.conv13_act = nn.ReLU()
        self.pool5 = nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))
        self.flatten = nn.Flatten()
        self.drop1 = nn.Dropout(p=0.5)
        self.fc1 = nn.Linear(in_features=512, out_features=512)
        self.fc1_act = nn.ReLU()
        self.drop2 = nn.Dropout(p=0.5)
        self.fc2 = nn.Linear(in_features=512, out_features=512)
        self.fc2_act = nn.ReLU()
        self.drop3 = nn.Dropout(p=0.5)
        self.fc3 = nn.Linear(in_features=512, out_features=10)

    def forward(self, inputs):
        conv1 = self.conv1_act(self.conv1(inputs.permute(0, 3, 1, 2)))
        conv2 = self.conv2_act(self.conv2(conv1))
        pool1 = self.pool1(conv2)
        conv3 = self.conv3_act(self.conv3(pool1))
        conv4 = self.conv4_act(self.conv4(conv3))
        pool2 = self.pool2(conv4)
        conv5 = self.conv5_act(self.conv5(pool2))
        conv6 = self.conv6_act(self.conv6(conv5))
        conv7 = self.conv7_act(self.conv7(conv6))
        pool3 = self.pool3(conv7)
        conv8 = self.conv8_act(self.conv8(pool3))
        conv9 = self.conv9_act(self.conv9(conv8))
        conv10 = self.conv10_act(self.conv10(conv9))
        pool4 = self.pool4(conv10)
        conv11 = self.conv11_act(self.conv11(pool4))
        conv12 = self.conv12_act(self.conv12(conv11))
        conv13 = self.conv13_act(self.conv13(conv12))
        pool5 = self.pool5(conv13).permute(0, 2, 3, 1)
        flatten = self.flatten(pool5)
        drop1 = self.drop1(flatten)
        fc1 = self.fc1_act(self.fc1(drop1))
        drop2 = self.drop2(fc1)
        fc2 = self.fc2_act(self.fc2(drop2))
        drop3 = self.drop3(fc2)
        fc3 = self.fc3(drop3)
        return fc3


def make_loader(dataset):
    return torch.utils.data.DataLoader(dataset, batch_size=64, shuffle=True)


def train(model, loader):
    optimizer = torch.optim.SGD(model.parameters(), lr=0.01)
    criterion = nn.CrossEntropyLoss()
    for epoch in range(10):
        model.train()
        for x, y in loader:
            optimizer.zero_grad()
            loss = criterion(model(x), y)
            loss.backward()
            optimizer.step()
    return model
