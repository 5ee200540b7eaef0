# Generated by nnport 0.1.0: pt/subclassing -> tf/subclassing, pivot sha256 0c6a60776d9620b334e49d1fd39ca786cf6f25e5fc194719156d32c068c57a5b
import tensorflow as tf
from tensorflow import keras
from tensorflow.keras import layers

INPUT_SHAPE = (32, 32, 3)
DATASETS = {
    "cifar10": ("data/cifar10", "classification", "images"),
    "svhn": ("data/svhn", "classification", "images"),
}


class VGG16(keras.Model):
    def __init__(self):
        super().__init__()
        self.conv1 = layers.Conv2D(filters=64, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.conv2 = layers.Conv2D(filters=64, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.pool1 = layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid")
        self.conv3 = layers.Conv2D(filters=128, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.conv4 = layers.Conv2D(filters=128, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.pool2 = layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid")
        self.conv5 = layers.Conv2D(filters=256, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.conv6 = layers.Conv2D(filters=256, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.conv7 = layers.Conv2D(filters=256, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.pool3 = layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid")
        self.conv8 = layers.Conv2D(filters=512, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.conv9 = layers.Conv2D(filters=512, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.conv10 = layers.Conv2D(filters=512, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.pool4 = layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid")
        self.conv11 = layers.Conv2D(filters=512, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.conv12 = layers.Conv2D(filters=512, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.conv13 = layers.Conv2D(filters=512, kernel_size=(3, 3), strides=(1, 1), padding="same", activation="relu")
        self.pool5 = layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid")
        self.flatten = layers.Flatten()
        self.drop1 = layers.Dropout(rate=0.5)
        self.fc1 = layers.Dense(units=512, activation="relu")
        self.drop2 = layers.Dropout(rate=0.5)
        self.fc2 = layers.Dense(units=512, activation="relu")
        self.drop3 = layers.Dropout(rate=0.5)
        self.fc3 = layers.Dense(units=10)

    def call(self, inputs):
        conv1 = self.conv1(inputs)
        conv2 = self.conv2(conv1)
        pool1 = self.pool1(conv2)
        conv3 = self.conv3(pool1)
        conv4 = self.conv4(conv3)
        pool2 = self.pool2(conv4)
        conv5 = self.conv5(pool2)
        conv6 = self.conv6(conv5)
        conv7 = self.conv7(conv6)
        pool3 = self.pool3(conv7)
        conv8 = self.conv8(pool3)
        conv9 = self.conv9(conv8)
        conv10 = self.conv10(conv9)
        pool4 = self.pool4(conv10)
        conv11 = self.conv11(pool4)
        conv12 = self.conv12(conv11)
        conv13 = self.conv13(conv12)
        pool5 = self.pool5(conv13)
        flatten = self.flatten(pool5)
        drop1 = self.drop1(flatten)
        fc1 = self.fc1(drop1)
        drop2 = self.drop2(fc1)
        fc2 = self.fc2(drop2)
        drop3 = self.drop3(fc2)
        fc3 = self.fc3(drop3)
        return fc3


def train(model, x, y):
    model.compile(
        optimizer=keras.optimizers.SGD(learning_rate=0.01),
        loss=keras.losses.SparseCategoricalCrossentropy(from_logits=True),
    )
    model.fit(x, y, batch_size=64, epochs=10)
    return model.evaluate(x, y)
